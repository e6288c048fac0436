#include "util.h"

int clamp(int v, int lo, int hi) {
    if (v < lo) return lo;
    if (v > hi) return hi;
    return v;
}

int scale(int v) {
    return clamp(v * SCALE, -100, 100);
}
