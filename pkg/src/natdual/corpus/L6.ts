testspace X over L6~
s 2
points aa cc bb ab ba 00
