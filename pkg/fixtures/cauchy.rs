structure prefix over met
points x1 x2 x3 x4 x5 x6 x7 x8
edge eq[1/2](x1,x2)
edge eq[1/6](x2,x3)
edge eq[1/12](x3,x4)
edge eq[1/20](x4,x5)
edge eq[1/30](x5,x6)
edge eq[1/42](x6,x7)
edge eq[1/56](x7,x8)
