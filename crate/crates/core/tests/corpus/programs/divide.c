extern int __VERIFIER_nondet_int(void);
int g;

int divide(int d) {
    g = g - d;
    while (g >= d) {
        g = g - d;
    }
    return g;
}

int main() {
    int x = __VERIFIER_nondet_int();
    int d = __VERIFIER_nondet_int();
    if (x < 0) return 0;
    if (d <= 0) return 0;
    g = x;
    int r = divide(d);
    assert(g < x);
    return 0;
}
