extern int __VERIFIER_nondet_int(void);

int pow2(int k) {
    int r = 1;
    while (k > 0) {
        r = r * 2;
        k = k - 1;
    }
    return r;
}

int main() {
    int k = __VERIFIER_nondet_int();
    if (k < 0) return 0;
    int p = pow2(k);
    assert(p > 0);
    return 0;
}
