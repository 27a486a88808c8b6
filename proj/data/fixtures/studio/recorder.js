export async function startRecording() {
  const stream = await navigator.mediaDevices.getUserMedia({ audio: true, video: true });
  document.querySelector('#preview').srcObject = stream;
  return stream;
}

export async function captureScreen() {
  return navigator.mediaDevices.getDisplayMedia({ video: { frameRate: 30 } });
}
