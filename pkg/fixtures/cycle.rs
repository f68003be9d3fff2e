structure cycle over pos
points a b c
edge le(a,b), le(b,c), le(c,a)
