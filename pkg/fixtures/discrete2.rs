structure discrete2 over pos
points x y
