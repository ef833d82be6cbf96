extern int __VERIFIER_nondet_int(void);

int clamp(int x, int lo, int hi) {
    if (x < lo) return lo;
    if (x > hi) return hi;
    return x;
}

int main() {
    int x = __VERIFIER_nondet_int();
    int lo = __VERIFIER_nondet_int();
    int hi = __VERIFIER_nondet_int();
    if (lo > hi) return 0;
    int c = clamp(x, lo, hi);
    assert(lo <= c && c <= hi);
    return 0;
}
