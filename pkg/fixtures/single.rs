structure single over met
points x
