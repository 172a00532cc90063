# test space for De Morgan algebras with the partition of D4~^2 onto it
testspace X over D4~
s 2
points ab ba aa bb 00
gamma
  aa a0 a1 0a 1a -> aa
  bb b0 b1 0b 1b -> bb
  00 01 10 11 -> 00
eta
  0ab1 -> ab
  0ba1 -> ba
