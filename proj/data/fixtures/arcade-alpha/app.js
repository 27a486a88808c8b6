export function shareScore(score) {
  navigator.clipboard.writeText('I scored ' + score + ' in Arcade Alpha!');
}

export function findNearbyPlayers(onFound) {
  navigator.geolocation.getCurrentPosition((pos) => {
    onFound(pos.coords.latitude, pos.coords.longitude);
  });
}
