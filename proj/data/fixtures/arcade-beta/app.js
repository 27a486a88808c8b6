export function trackRun(onMove) {
  navigator.geolocation.watchPosition(onMove);
}

export async function scanBadge() {
  const reader = new NDEFReader();
  await reader.scan();
  return reader;
}
