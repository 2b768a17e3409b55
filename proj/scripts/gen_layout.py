"""Generates core/data/electrodes_64.csv: idealized unit-sphere 10-10 positions.

Fpz, T7, Oz, T8 lie on the equator; x points right, y to the nose, z up.
Each coronal-ish row (e.g. F7..Fz..F8) lies on the circle through its two
equatorial endpoints and its midline electrode, divided into equal arcs.
"""
import math
import numpy as np

def sph(polar_deg, az_deg):
    # azimuth measured from +y (nose) toward +x (right)
    p, a = math.radians(polar_deg), math.radians(az_deg)
    return np.array([math.sin(p) * math.sin(a), math.sin(p) * math.cos(a), math.cos(p)])

def row(left, mid, right, n):
    """n equal arcs between left and mid on the circle through left/mid/right."""
    # circumcenter of the three points
    a, b, c = left, mid, right
    ab, ac = b - a, c - a
    nrm = np.cross(ab, ac)
    center = a + (np.dot(ac, ac) * np.cross(nrm, ab) + np.dot(ab, ab) * np.cross(ac, nrm)) / (2 * np.dot(nrm, nrm))
    u = (a - center); r = np.linalg.norm(u); u /= r
    w = np.cross(nrm / np.linalg.norm(nrm), u)
    vm = (mid - center) / r
    ang = math.atan2(np.dot(vm, w), np.dot(vm, u))
    pts = [center + r * (math.cos(ang * f / n) * u + math.sin(ang * f / n) * w) for f in range(n + 1)]
    return [p / np.linalg.norm(p) for p in pts]

pos = {}
eq = {"Fpz": 0, "Fp2": 18, "Af8": 36, "F8": 54, "Ft8": 72, "T8": 90, "Tp8": 108, "P8": 126,
      "Po8": 144, "O2": 162, "Oz": 180, "Fp1": -18, "Af7": -36, "F7": -54, "Ft7": -72, "T7": -90,
      "Tp7": -108, "P7": -126, "Po7": -144, "O1": -162}
for k, v in eq.items():
    pos[k] = sph(90, v)
pos["Iz"] = sph(112.5, 180)
pos["T9"] = sph(112.5, -90)
pos["T10"] = sph(112.5, 90)
rows = [("Af", "Af7", 67.5, 0, {2: "Af3"}),
        ("F", "F7", 45, 0, {1: "F5", 2: "F3", 3: "F1"}),
        ("Fc", "Ft7", 22.5, 0, {1: "Fc5", 2: "Fc3", 3: "Fc1"}),
        ("C", "T7", 0, 0, {1: "C5", 2: "C3", 3: "C1"}),
        ("Cp", "Tp7", 22.5, 180, {1: "Cp5", 2: "Cp3", 3: "Cp1"}),
        ("P", "P7", 45, 180, {1: "P5", 2: "P3", 3: "P1"}),
        ("Po", "Po7", 67.5, 180, {2: "Po3"})]
for prefix, left_name, mid_polar, mid_az, lefts in rows:
    left = pos[left_name]
    right = left * np.array([-1, 1, 1])
    mid = sph(mid_polar, mid_az)
    pts = row(left, mid, right, 4)
    pos[prefix + "z"] = mid
    for idx, name in lefts.items():
        p = pts[idx]
        pos[name] = p
        rname = name[:-1] + str(int(name[-1]) + 1)
        pos[rname] = p * np.array([-1, 1, 1])
order = ("Fc5 Fc3 Fc1 Fcz Fc2 Fc4 Fc6 C5 C3 C1 Cz C2 C4 C6 Cp5 Cp3 Cp1 Cpz Cp2 Cp4 Cp6 "
         "Fp1 Fpz Fp2 Af7 Af3 Afz Af4 Af8 F7 F5 F3 F1 Fz F2 F4 F6 F8 Ft7 Ft8 T7 T8 T9 T10 "
         "Tp7 Tp8 P7 P5 P3 P1 Pz P2 P4 P6 P8 Po7 Po3 Poz Po4 Po8 O1 Oz O2 Iz").split()
assert len(order) == 64 and len(set(order)) == 64
with open("core/data/electrodes_64.csv", "w") as f:
    f.write("name,x,y,z\n")
    for n in order:
        p = pos[n] / np.linalg.norm(pos[n])
        f.write(f"{n.upper()},{p[0]:.17g},{p[1]:.17g},{p[2]:.17g}\n")
