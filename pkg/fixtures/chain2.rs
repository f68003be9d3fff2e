structure chain2 over pos
points x y
edge le(x,y)
