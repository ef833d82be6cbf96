extern int __VERIFIER_nondet_int(void);

int gcd(int a, int b) {
    while (b != 0) {
        int t = a % b;
        a = b;
        b = t;
    }
    return a;
}

int main() {
    int a = __VERIFIER_nondet_int();
    int b = __VERIFIER_nondet_int();
    if (a <= 0) return 0;
    if (b <= 0) return 0;
    int r = gcd(a, b);
    assert(r > 0);
    assert(a % r == 0 && b % r == 0);
    return 0;
}
