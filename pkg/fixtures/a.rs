structure a over met
points a1 a2
edge eq[1/4](a1,a2)
