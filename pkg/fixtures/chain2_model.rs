# the two-element chain with every edge of the model listed
structure chain2 over pos
points x y
edge le(x,x), le(x,y), le(y,y)
