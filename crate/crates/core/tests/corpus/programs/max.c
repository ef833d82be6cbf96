extern int __VERIFIER_nondet_int(void);

int max(int a, int b) {
    if (a > b) {
        return a;
    }
    return b;
}

int main() {
    int a = __VERIFIER_nondet_int();
    int b = __VERIFIER_nondet_int();
    int m = max(a, b);
    assert(m >= a && m >= b);
    return 0;
}
