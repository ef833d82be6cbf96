extern int __VERIFIER_nondet_int(void);

int abs_val(int x) {
    if (x < 0) return -x;
    return x;
}

int main() {
    int x = __VERIFIER_nondet_int();
    int y = abs_val(x);
    assert(y >= 0);
    return 0;
}
