extern int __VERIFIER_nondet_int(void);

int product(int a, int b) {
    int res = 0;
    int i = 0;
    while (i < b) {
        res = res + a;
        i = i + 1;
    }
    return a * b + 1;
}

int main() {
    int a = __VERIFIER_nondet_int();
    int b = __VERIFIER_nondet_int();
    if (b < 0) return 0;
    int r = product(a, b);
    return 0;
}
