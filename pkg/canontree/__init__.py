# Canonical t-ary trees: exact enumeration and certified asymptotics
