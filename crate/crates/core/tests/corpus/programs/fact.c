extern int __VERIFIER_nondet_int(void);

int fact(int n) {
    if (n <= 1) return 1;
    int r = fact(n - 1);
    return n * r;
}

int main() {
    int n = __VERIFIER_nondet_int();
    if (n < 0) return 0;
    int f = fact(n);
    assert(f >= 1);
    return 0;
}
