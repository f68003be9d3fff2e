structure bad over pos
points a b
edge le(a,c)
