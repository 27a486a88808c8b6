async function enableSync() {
  const permission = await Notification.requestPermission();
  if (permission !== 'granted') return;
  const reg = await navigator.serviceWorker.ready;
  await reg.pushManager.subscribe({ userVisibleOnly: true });
  await reg.sync.register('note-outbox');
}

document.querySelector('#editor').addEventListener('input', enableSync, { once: true });
