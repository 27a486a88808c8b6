export async function init(wire, layout) {
  const idle = new IdleDetector();
  await idle.start({ threshold: 60000 });

  const midi = await navigator.requestMIDIAccess();
  wire(midi);

  if (document.requestStorageAccess) {
    await document.requestStorageAccess();
  }
  await navigator.storage.persist();

  const reg = await navigator.serviceWorker.ready;
  await reg.periodicSync.register('refresh-feeds', { minInterval: 86400000 });

  const screens = await getScreenDetails();
  const fonts = await queryLocalFonts();
  layout(screens, fonts);
}

export function grabPointer(canvas) {
  canvas.requestPointerLock();
}

export function listInstruments(registration) {
  return registration.paymentManager.instruments.get('card');
}
