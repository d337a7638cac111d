"""Reference values for the reward and course fixtures used in the unit tests.

Independent of the C++ code; run with python3 and compare against the frozen
numbers in tests/unit/test_task.cpp.
"""
import math


def r_vel(v, yaw, v_cmd, psi_cmd, k_pos=1.0, k_neg=-3.0):
    along = v * math.cos(psi_cmd - yaw)
    gain = k_pos if along > 0 else k_neg
    return gain * abs(min(along, v_cmd) / v_cmd)


def r_pos(hips, other_dev=0.0, w1=0.5, w2=0.5):
    fl, fr, rl, rr = hips
    right = (fr + rr) / 2
    left = (fl + rl) / 2
    front = (fl + fr) / 2
    rear = (rl + rr) / 2
    guide = (right + left) ** 2 + (front - rear) ** 2
    natural = sum(h * h for h in hips) + other_dev
    return w1 * guide + w2 * natural


def lerp(easy, hard, d):
    return easy + d * (hard - easy)


if __name__ == "__main__":
    print("r_vel aligned 0.5/0.5", r_vel(0.5, 0, 0.5, 0))
    print("r_vel backward -0.3/0.5", r_vel(-0.3, 0, 0.5, 0))
    print("r_vel 0.8 at 60deg /0.5", r_vel(0.8, 0, 0.5, math.radians(60)))
    print("r_pos left/right antisymmetric 0.1", r_pos((0.1, -0.1, 0.1, -0.1)))
    print("r_pos all hips 0.2", r_pos((0.2, 0.2, 0.2, 0.2)))
    print("crack gap at 0.5", lerp(0.38, 0.28, 0.5))
    print("yaw row at match", 0.5 * math.exp(0))
    print("foot z at default", -0.213 * (math.cos(0.8) + math.cos(0.7)))
