"""Write cases/ieee39.json from the published New England 39-bus data (100 MVA base)."""
import json
import math
import sys

BRANCHES = """
1 2 .0035 .0411 .6987
1 39 .001 .025 .75
2 3 .0013 .0151 .2572
2 25 .007 .0086 .146
2 30 0 .0181 0 1.025
3 4 .0013 .0213 .2214
3 18 .0011 .0133 .2138
4 5 .0008 .0128 .1342
4 14 .0008 .0129 .1382
5 6 .0002 .0026 .0434
5 8 .0008 .0112 .1476
6 7 .0006 .0092 .113
6 11 .0007 .0082 .1389
6 31 0 .025 0 1.07
7 8 .0004 .0046 .078
8 9 .0023 .0363 .3804
9 39 .001 .025 1.2
10 11 .0004 .0043 .0729
10 13 .0004 .0043 .0729
10 32 0 .02 0 1.07
12 11 .0016 .0435 0 1.006
12 13 .0016 .0435 0 1.006
13 14 .0009 .0101 .1723
14 15 .0018 .0217 .366
15 16 .0009 .0094 .171
16 17 .0007 .0089 .1342
16 19 .0016 .0195 .304
16 21 .0008 .0135 .2548
16 24 .0003 .0059 .068
17 18 .0007 .0082 .1319
17 27 .0013 .0173 .3216
19 20 .0007 .0138 0 1.06
19 33 .0007 .0142 0 1.07
20 34 .0009 .018 0 1.009
21 22 .0008 .014 .2565
22 23 .0006 .0096 .1846
22 35 0 .0143 0 1.025
23 24 .0022 .035 .361
23 36 .0005 .0272 0 1.0
25 26 .0032 .0323 .513
25 37 .0006 .0232 0 1.025
26 27 .0014 .0147 .2396
26 28 .0043 .0474 .7802
26 29 .0057 .0625 1.029
28 29 .0014 .0151 .249
29 38 .0008 .0156 0 1.025
"""

LOADS = """
3 322 2.4
4 500 184
7 233.8 84
8 522 176
12 7.5 88
15 320 153
16 329 32.3
18 158 30
20 628 103
21 274 115
23 247.5 84.6
24 308.6 -92.2
25 224 47.2
26 139 17
27 281 75.5
28 206 27.6
29 283.5 26.9
31 9.2 4.6
39 1104 250
"""

# bus, P [MW], V set [pu], H [s on 100 MVA], x'd [pu on 100 MVA]
GENERATORS = """
30 250 1.0475 42.0 0.031
31 520.81 0.982 30.3 0.0697
32 650 0.9831 35.8 0.0531
33 632 0.9972 28.6 0.0436
34 508 1.0123 26.0 0.132
35 650 1.0493 34.8 0.05
36 560 1.0635 26.4 0.049
37 540 1.0278 24.3 0.057
38 830 1.0265 34.5 0.057
39 1000 1.03 500.0 0.006
"""

BASE = 100.0
OMEGA_S = 2 * math.pi * 60


def rows(text):
    return [line.split() for line in text.strip().splitlines()]


def main(path):
    branches = []
    for r in rows(BRANCHES):
        br = {"from": int(r[0]), "to": int(r[1]), "r": float(r[2]), "x": float(r[3]), "b": float(r[4])}
        br["tap"] = float(r[5]) if len(r) > 5 else 1.0
        branches.append(br)
    loads = [
        {"bus": int(r[0]), "p": float(r[1]) / BASE, "q": float(r[2]) / BASE, "model": "constant_impedance", "v_threshold": 0.7}
        for r in rows(LOADS)
    ]
    gens = [
        {
            "bus": int(r[0]),
            "inertia": 2 * float(r[3]) / OMEGA_S,
            "xd_prime": float(r[4]),
            "p_mech": float(r[1]) / BASE,
            "v_set": float(r[2]),
            "damping": 0.0,
        }
        for r in rows(GENERATORS)
    ]
    case = {
        "name": "ieee39",
        "base_mva": BASE,
        "buses": [{"id": i, "gs": 0.0, "bs": 0.0} for i in range(1, 40)],
        "branches": branches,
        "generators": gens,
        "loads": loads,
    }
    with open(path, "w") as f:
        json.dump(case, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "cases/ieee39.json")
