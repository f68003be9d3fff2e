structure pair over met
points x y
edge eq[1/2](x,y)
