structure bad over met
points a b
edge eq[3/2](a,b)
