extern int __VERIFIER_nondet_int(void);

int sign(int x) {
    if (x > 0) return 1;
    if (x < 0) return -1;
    return 0;
}

int main() {
    int x = __VERIFIER_nondet_int();
    int s = sign(x);
    assert(s * x >= 0);
    return 0;
}
