# smallest test space found by the full search; no 4-point one exists
testspace X over K3~
s 2
points 0c 01 bc dd d1
