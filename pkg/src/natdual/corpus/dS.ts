testspace X over dS~
s 2
points 00 aa ab bb
gamma
  ba -> ab
  00 0a 0b 01 a0 a1 b0 b1 10 1a 1b 11 -> 00
