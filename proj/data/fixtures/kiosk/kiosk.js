let wakeLockSentinel = null;

export async function keepAwake() {
  wakeLockSentinel = await navigator.wakeLock.request('screen');
}

export function enterKioskMode(root, report) {
  root.requestFullscreen();
  // navigator.serviceWorker.register('/sw.js') is called by the shell build.
  navigator.permissions.query({ name: 'keyboard-lock' }).then(report);
  navigator.permissions.query({ name: 'super-zap' }).then(report);
}
