extern int __VERIFIER_nondet_int(void);

int fib(int n) {
    int a = 0;
    int b = 1;
    int i = 0;
    while (i < n) {
        int t = a + b;
        a = b;
        b = t;
        i = i + 1;
    }
    return a;
}

int main() {
    int n = __VERIFIER_nondet_int();
    if (n < 0) return 0;
    int r = fib(n);
    assert(r >= 0);
    return 0;
}
