#ifndef UTIL_H
#define UTIL_H

#define SCALE 3

struct point {
    int x;
    int y;
};

int clamp(int v, int lo, int hi);
int scale(int v);
int dot(struct point a, struct point b);
int norm1(struct point p);

#endif
