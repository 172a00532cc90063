# found by the full search; gamma and eta are recomputed when loading
testspace X over K2~
s 2
points 01 aa ac a1
