# found by the full search over the brute-force alter ego
testspace X over L5~
s 2
points 00 aa ac cc
