structure b over met
points b1 b2
edge eq[1/2](b1,b2)
