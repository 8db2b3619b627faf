"""Emit the 57-bus and 118-bus case files from canonical data tables.

The canonical distributions of these two cases carry no MVA ratings; here
each branch gets the impedance-proxy rating 100*sin(15 deg)/x MW, rounded to
an integer, which is the documented convention of the curated OPF benchmarks
for cases with missing limits. Run from the repo root:

    python scripts/make_cases.py
"""

import math
import os

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "data")

# -- 57 bus ------------------------------------------------------------------

# bus id -> (type, Pd, Qd)
BUS57 = {
    1: (3, 55.0, 17.0), 2: (2, 3.0, 88.0), 3: (2, 41.0, 21.0), 4: (1, 0.0, 0.0),
    5: (1, 13.0, 4.0), 6: (2, 75.0, 2.0), 7: (1, 0.0, 0.0), 8: (2, 150.0, 22.0),
    9: (2, 121.0, 26.0), 10: (1, 5.0, 2.0), 11: (1, 0.0, 0.0), 12: (2, 377.0, 24.0),
    13: (1, 18.0, 2.3), 14: (1, 10.5, 5.3), 15: (1, 22.0, 5.0), 16: (1, 43.0, 3.0),
    17: (1, 42.0, 8.0), 18: (1, 27.2, 9.8), 19: (1, 3.3, 0.6), 20: (1, 2.3, 1.0),
    21: (1, 0.0, 0.0), 22: (1, 0.0, 0.0), 23: (1, 6.3, 2.1), 24: (1, 0.0, 0.0),
    25: (1, 6.3, 3.2), 26: (1, 0.0, 0.0), 27: (1, 9.3, 0.5), 28: (1, 4.6, 2.3),
    29: (1, 17.0, 2.6), 30: (1, 3.6, 1.8), 31: (1, 5.8, 2.9), 32: (1, 1.6, 0.8),
    33: (1, 3.8, 1.9), 34: (1, 0.0, 0.0), 35: (1, 6.0, 3.0), 36: (1, 0.0, 0.0),
    37: (1, 0.0, 0.0), 38: (1, 14.0, 7.0), 39: (1, 0.0, 0.0), 40: (1, 0.0, 0.0),
    41: (1, 6.3, 3.0), 42: (1, 7.1, 4.4), 43: (1, 2.0, 1.0), 44: (1, 12.0, 1.8),
    45: (1, 0.0, 0.0), 46: (1, 0.0, 0.0), 47: (1, 29.7, 11.6), 48: (1, 0.0, 0.0),
    49: (1, 18.0, 8.5), 50: (1, 21.0, 10.5), 51: (1, 18.0, 5.3), 52: (1, 4.9, 2.2),
    53: (1, 20.0, 10.0), 54: (1, 4.1, 1.4), 55: (1, 6.8, 3.4), 56: (1, 7.6, 2.2),
    57: (1, 6.7, 2.0),
}

# bus, Pg, Qmax, Qmin, Pmax
GEN57 = [
    (1, 128.9, 200.0, -140.0, 575.88),
    (2, 0.0, 50.0, -17.0, 100.0),
    (3, 40.0, 60.0, -10.0, 140.0),
    (6, 0.0, 25.0, -8.0, 100.0),
    (8, 450.0, 200.0, -140.0, 550.0),
    (9, 0.0, 9.0, -3.0, 100.0),
    (12, 310.0, 155.0, -150.0, 410.0),
]

# from, to, r, x, ratio
BRANCH57 = [
    (1, 2, 0.0083, 0.028, 0.0), (2, 3, 0.0298, 0.085, 0.0),
    (3, 4, 0.0112, 0.0366, 0.0), (4, 5, 0.0625, 0.132, 0.0),
    (4, 6, 0.043, 0.148, 0.0), (6, 7, 0.02, 0.102, 0.0),
    (6, 8, 0.0339, 0.173, 0.0), (8, 9, 0.0099, 0.0505, 0.0),
    (9, 10, 0.0369, 0.1679, 0.0), (9, 11, 0.0258, 0.0848, 0.0),
    (9, 12, 0.0648, 0.295, 0.0), (9, 13, 0.0481, 0.158, 0.0),
    (13, 14, 0.0132, 0.0434, 0.0), (13, 15, 0.0269, 0.0869, 0.0),
    (1, 15, 0.0178, 0.091, 0.0), (1, 16, 0.0454, 0.206, 0.0),
    (1, 17, 0.0238, 0.108, 0.0), (3, 15, 0.0162, 0.053, 0.0),
    (4, 18, 0.0, 0.555, 0.97), (4, 18, 0.0, 0.43, 0.978),
    (5, 6, 0.0302, 0.0641, 0.0), (7, 8, 0.0139, 0.0712, 0.0),
    (10, 12, 0.0277, 0.1262, 0.0), (11, 13, 0.0223, 0.0732, 0.0),
    (12, 13, 0.0178, 0.058, 0.0), (12, 16, 0.018, 0.0813, 0.0),
    (12, 17, 0.0397, 0.179, 0.0), (14, 15, 0.0171, 0.0547, 0.0),
    (18, 19, 0.461, 0.685, 0.0), (19, 20, 0.283, 0.434, 0.0),
    (21, 20, 0.0, 0.7767, 1.043), (21, 22, 0.0736, 0.117, 0.0),
    (22, 23, 0.0099, 0.0152, 0.0), (23, 24, 0.166, 0.256, 0.0),
    (24, 25, 0.0, 1.182, 1.0), (24, 25, 0.0, 1.23, 1.0),
    (24, 26, 0.0, 0.0473, 1.043), (26, 27, 0.165, 0.254, 0.0),
    (27, 28, 0.0618, 0.0954, 0.0), (28, 29, 0.0418, 0.0587, 0.0),
    (7, 29, 0.0, 0.0648, 0.967), (25, 30, 0.135, 0.202, 0.0),
    (30, 31, 0.326, 0.497, 0.0), (31, 32, 0.507, 0.755, 0.0),
    (32, 33, 0.0392, 0.036, 0.0), (34, 32, 0.0, 0.953, 0.975),
    (34, 35, 0.052, 0.078, 0.0), (35, 36, 0.043, 0.0537, 0.0),
    (36, 37, 0.029, 0.0366, 0.0), (37, 38, 0.0651, 0.1009, 0.0),
    (37, 39, 0.0239, 0.0379, 0.0), (36, 40, 0.03, 0.0466, 0.0),
    (22, 38, 0.0192, 0.0295, 0.0), (11, 41, 0.0, 0.749, 0.955),
    (41, 42, 0.207, 0.352, 0.0), (41, 43, 0.0, 0.412, 0.0),
    (38, 44, 0.0289, 0.0585, 0.0), (15, 45, 0.0, 0.1042, 0.955),
    (14, 46, 0.0, 0.0735, 0.9), (46, 47, 0.023, 0.068, 0.0),
    (47, 48, 0.0182, 0.0233, 0.0), (48, 49, 0.0834, 0.129, 0.0),
    (49, 50, 0.0801, 0.128, 0.0), (50, 51, 0.1386, 0.22, 0.0),
    (10, 51, 0.0, 0.0712, 0.93), (13, 49, 0.0, 0.191, 0.895),
    (29, 52, 0.1442, 0.187, 0.0), (52, 53, 0.0762, 0.0984, 0.0),
    (53, 54, 0.1878, 0.232, 0.0), (54, 55, 0.1732, 0.2265, 0.0),
    (11, 43, 0.0, 0.153, 0.958), (44, 45, 0.0624, 0.1242, 0.0),
    (40, 56, 0.0, 1.195, 0.958), (56, 41, 0.553, 0.549, 0.0),
    (56, 42, 0.2125, 0.354, 0.0), (39, 57, 0.0, 1.355, 0.98),
    (57, 56, 0.174, 0.26, 0.0), (38, 49, 0.115, 0.177, 0.0),
    (38, 48, 0.0312, 0.0482, 0.0), (9, 55, 0.0, 0.1205, 0.94),
]

# -- 118 bus -----------------------------------------------------------------

PD118 = {
    1: 51, 2: 20, 3: 39, 4: 39, 5: 0, 6: 52, 7: 19, 8: 28, 9: 0, 10: 0,
    11: 70, 12: 47, 13: 34, 14: 14, 15: 90, 16: 25, 17: 11, 18: 60, 19: 45,
    20: 18, 21: 14, 22: 10, 23: 7, 24: 13, 25: 0, 26: 0, 27: 71, 28: 17,
    29: 24, 30: 0, 31: 43, 32: 59, 33: 23, 34: 59, 35: 33, 36: 31, 37: 0,
    38: 0, 39: 27, 40: 66, 41: 37, 42: 96, 43: 18, 44: 16, 45: 53, 46: 28,
    47: 34, 48: 20, 49: 87, 50: 17, 51: 17, 52: 18, 53: 23, 54: 113, 55: 63,
    56: 84, 57: 12, 58: 12, 59: 277, 60: 78, 61: 0, 62: 77, 63: 0, 64: 0,
    65: 0, 66: 39, 67: 28, 68: 0, 69: 0, 70: 66, 71: 0, 72: 12, 73: 6,
    74: 68, 75: 47, 76: 68, 77: 61, 78: 71, 79: 39, 80: 130, 81: 0, 82: 54,
    83: 20, 84: 11, 85: 24, 86: 21, 87: 0, 88: 48, 89: 0, 90: 163, 91: 10,
    92: 65, 93: 12, 94: 30, 95: 42, 96: 38, 97: 15, 98: 34, 99: 42, 100: 37,
    101: 22, 102: 5, 103: 23, 104: 38, 105: 31, 106: 43, 107: 50, 108: 2,
    109: 8, 110: 39, 111: 0, 112: 68, 113: 6, 114: 8, 115: 22, 116: 184,
    117: 20, 118: 33,
}

# bus -> Pg for the 54 units (zero-output units kept: they are synchronous
# condensers in the canonical data)
GEN118 = {
    1: 0, 4: 0, 6: 0, 8: 0, 10: 450, 12: 85, 15: 0, 18: 0, 19: 0, 24: 0,
    25: 220, 26: 314, 27: 0, 31: 7, 32: 0, 34: 0, 36: 0, 40: 0, 42: 0,
    46: 19, 49: 204, 54: 48, 55: 0, 56: 0, 59: 155, 61: 160, 62: 0, 65: 391,
    66: 392, 69: 516.4, 70: 0, 72: 0, 73: 0, 74: 0, 76: 0, 77: 0, 80: 477,
    85: 0, 87: 4, 89: 607, 90: 0, 91: 0, 92: 0, 99: 0, 100: 252, 103: 40,
    104: 0, 105: 0, 107: 0, 110: 0, 111: 36, 112: 0, 113: 0, 116: 0,
}

BRANCH118 = [
    (1, 2, 0.0999), (1, 3, 0.0424), (4, 5, 0.00798), (3, 5, 0.108),
    (5, 6, 0.054), (6, 7, 0.0208), (8, 9, 0.0305), (8, 5, 0.0267),
    (9, 10, 0.0322), (4, 11, 0.0688), (5, 11, 0.0682), (11, 12, 0.0196),
    (2, 12, 0.0616), (3, 12, 0.16), (7, 12, 0.034), (11, 13, 0.0731),
    (12, 14, 0.0707), (13, 15, 0.2444), (14, 15, 0.195), (12, 16, 0.0834),
    (15, 17, 0.0437), (16, 17, 0.1801), (17, 18, 0.0505), (18, 19, 0.0493),
    (19, 20, 0.117), (15, 19, 0.0394), (20, 21, 0.0849), (21, 22, 0.097),
    (22, 23, 0.159), (23, 24, 0.0492), (23, 25, 0.08), (26, 25, 0.0382),
    (25, 27, 0.163), (27, 28, 0.0855), (28, 29, 0.0943), (30, 17, 0.0388),
    (8, 30, 0.0504), (26, 30, 0.086), (17, 31, 0.1563), (29, 31, 0.0331),
    (23, 32, 0.1153), (31, 32, 0.0985), (27, 32, 0.0755), (15, 33, 0.1244),
    (19, 34, 0.247), (35, 36, 0.0102), (35, 37, 0.0497), (33, 37, 0.142),
    (34, 36, 0.0268), (34, 37, 0.0094), (38, 37, 0.0375), (37, 39, 0.106),
    (37, 40, 0.168), (30, 38, 0.054), (39, 40, 0.0605), (40, 41, 0.0487),
    (40, 42, 0.183), (41, 42, 0.135), (43, 44, 0.2454), (34, 43, 0.1681),
    (44, 45, 0.0901), (45, 46, 0.1356), (46, 47, 0.127), (46, 48, 0.189),
    (47, 49, 0.0625), (42, 49, 0.323), (42, 49, 0.323), (45, 49, 0.186),
    (48, 49, 0.0505), (49, 50, 0.0752), (49, 51, 0.137), (51, 52, 0.0588),
    (52, 53, 0.1635), (53, 54, 0.122), (49, 54, 0.289), (49, 54, 0.291),
    (54, 55, 0.0707), (54, 56, 0.00955), (55, 56, 0.0151), (56, 57, 0.0966),
    (50, 57, 0.134), (56, 58, 0.0966), (51, 58, 0.0719), (54, 59, 0.2293),
    (56, 59, 0.251), (56, 59, 0.239), (55, 59, 0.2158), (59, 60, 0.145),
    (59, 61, 0.15), (60, 61, 0.0135), (60, 62, 0.0561), (61, 62, 0.0376),
    (63, 59, 0.0386), (63, 64, 0.02), (64, 61, 0.0268), (38, 65, 0.0986),
    (64, 65, 0.0302), (49, 66, 0.0919), (49, 66, 0.0919), (62, 66, 0.218),
    (62, 67, 0.117), (65, 66, 0.037), (66, 67, 0.1015), (65, 68, 0.016),
    (47, 69, 0.2778), (49, 69, 0.324), (68, 69, 0.037), (69, 70, 0.127),
    (24, 70, 0.4115), (70, 71, 0.0355), (24, 72, 0.196), (71, 72, 0.18),
    (71, 73, 0.0454), (70, 74, 0.1323), (70, 75, 0.141), (69, 75, 0.122),
    (74, 75, 0.0406), (76, 77, 0.148), (69, 77, 0.101), (75, 77, 0.1999),
    (77, 78, 0.0124), (78, 79, 0.0244), (77, 80, 0.0485), (77, 80, 0.105),
    (79, 80, 0.0704), (68, 81, 0.0202), (81, 80, 0.037), (77, 82, 0.0853),
    (82, 83, 0.03665), (83, 84, 0.132), (83, 85, 0.148), (84, 85, 0.0641),
    (85, 86, 0.123), (86, 87, 0.2074), (85, 88, 0.102), (85, 89, 0.173),
    (88, 89, 0.0712), (89, 90, 0.188), (89, 90, 0.0997), (90, 91, 0.0836),
    (89, 92, 0.0505), (89, 92, 0.1581), (91, 92, 0.1272), (92, 93, 0.0848),
    (92, 94, 0.158), (93, 94, 0.0732), (94, 95, 0.0434), (80, 96, 0.182),
    (82, 96, 0.053), (94, 96, 0.0869), (80, 97, 0.0934), (80, 98, 0.108),
    (80, 99, 0.206), (92, 100, 0.295), (94, 100, 0.058), (95, 96, 0.0547),
    (96, 97, 0.0885), (98, 100, 0.179), (99, 100, 0.0813), (100, 101, 0.1262),
    (92, 102, 0.0559), (101, 102, 0.112), (100, 103, 0.0525), (100, 104, 0.204),
    (103, 104, 0.1584), (103, 105, 0.1625), (100, 106, 0.229), (104, 105, 0.0378),
    (105, 106, 0.0547), (105, 107, 0.183), (105, 108, 0.0703), (106, 107, 0.183),
    (108, 109, 0.0288), (103, 110, 0.1813), (109, 110, 0.0762), (110, 111, 0.0755),
    (110, 112, 0.064), (17, 113, 0.0301), (32, 113, 0.203), (32, 114, 0.0612),
    (27, 115, 0.0741), (114, 115, 0.0104), (68, 116, 0.00405), (12, 117, 0.14),
    (75, 118, 0.0481), (76, 118, 0.0544),
]


def proxy_rate(x: float) -> int:
    """Impedance-proxy MVA rating for branches lacking one in the source data."""
    return max(1, round(100.0 * math.sin(math.radians(15.0)) / x))


def emit_case57() -> str:
    lines = [
        "% IEEE 57-bus test system, DC-subset reconstruction.",
        "% Canonical topology, loads and dispatch; thermal ratings use the",
        "% impedance-proxy rule for cases whose source data carries none.",
        "% Generated by scripts/make_cases.py; see data/README.md.",
        "function mpc = case57_ieee",
        "mpc.version = '2';",
        "mpc.baseMVA = 100.0;",
        "",
        "%% bus data",
        "%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin",
        "mpc.bus = [",
    ]
    for bid, (btype, pd, qd) in BUS57.items():
        lines.append(f"\t{bid}\t {btype}\t {pd}\t {qd}\t 0.0\t 0.0\t 1"
                     f"\t 1.0\t 0.0\t 0.0\t 1\t 1.06\t 0.94;")
    lines.append("];")
    lines.append("")
    lines.append("%% generator data")
    lines.append("%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin")
    lines.append("mpc.gen = [")
    for bus, pg, qmax, qmin, pmax in GEN57:
        lines.append(f"\t{bus}\t {pg}\t 0.0\t {qmax}\t {qmin}\t 1.0\t 100.0"
                     f"\t 1\t {pmax}\t 0.0;")
    lines.append("];")
    lines.append("")
    lines.append("%% branch data")
    lines.append("%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle"
                 "\tstatus\tangmin\tangmax")
    lines.append("mpc.branch = [")
    for f, t, r, x, ratio in BRANCH57:
        rate = proxy_rate(x)
        lines.append(f"\t{f}\t {t}\t {r}\t {x}\t 0.0\t {rate}.0\t {rate}.0"
                     f"\t {rate}.0\t {ratio}\t 0.0\t 1\t -30.0\t 30.0;")
    lines.append("];")
    lines.append("")
    return "\n".join(lines)


def emit_case118() -> str:
    lines = [
        "% IEEE 118-bus test system, DC-subset reconstruction.",
        "% Canonical topology, loads and dispatch; thermal ratings use the",
        "% impedance-proxy rule for cases whose source data carries none.",
        "% Generated by scripts/make_cases.py; see data/README.md.",
        "function mpc = case118_ieee",
        "mpc.version = '2';",
        "mpc.baseMVA = 100.0;",
        "",
        "%% bus data",
        "%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin",
        "mpc.bus = [",
    ]
    for bid in range(1, 119):
        btype = 3 if bid == 69 else (2 if bid in GEN118 else 1)
        pd = PD118[bid]
        lines.append(f"\t{bid}\t {btype}\t {pd}.0\t 0.0\t 0.0\t 0.0\t 1"
                     f"\t 1.0\t 0.0\t 0.0\t 1\t 1.06\t 0.94;")
    lines.append("];")
    lines.append("")
    lines.append("%% generator data")
    lines.append("%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin")
    lines.append("mpc.gen = [")
    for bus, pg in GEN118.items():
        pmax = max(100.0, round(float(pg) * 1.25, 1))
        lines.append(f"\t{bus}\t {pg}\t 0.0\t 300.0\t -300.0\t 1.0\t 100.0"
                     f"\t 1\t {pmax}\t 0.0;")
    lines.append("];")
    lines.append("")
    lines.append("%% branch data")
    lines.append("%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle"
                 "\tstatus\tangmin\tangmax")
    lines.append("mpc.branch = [")
    for f, t, x in BRANCH118:
        rate = proxy_rate(x)
        lines.append(f"\t{f}\t {t}\t 0.0\t {x}\t 0.0\t {rate}.0\t {rate}.0"
                     f"\t {rate}.0\t 0.0\t 0.0\t 1\t -30.0\t 30.0;")
    lines.append("];")
    lines.append("")
    return "\n".join(lines)


def main() -> None:
    with open(os.path.join(DATA, "case57_ieee.m"), "w") as fh:
        fh.write(emit_case57())
    with open(os.path.join(DATA, "case118_ieee.m"), "w") as fh:
        fh.write(emit_case118())
    print("wrote case57_ieee.m and case118_ieee.m")


if __name__ == "__main__":
    main()
