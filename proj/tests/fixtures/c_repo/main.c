#include <stdio.h>
#include "util.h"

int g_calls = 0;

int total(struct point p, int v) {
    g_calls++;
    return scale(v) + norm1(p);
}
