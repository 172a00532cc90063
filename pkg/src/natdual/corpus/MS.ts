# retraction of MS~^2 onto X; the points of X go to themselves
testspace X over MS~
s 2
points 00 aa ad da ba dd
gamma
  bb bd db dd b0 bc b1 d0 dc d1 0b 0d cb cd 1b 1d -> dd
  aa a0 ac a1 0a ca 1a -> aa
  ab -> ad
  00 0c 01 c0 cc c1 10 1c 11 -> 00
eta
  0abcd1 -> ba
  0da1a1 -> ad
  0ad1d1 -> da
