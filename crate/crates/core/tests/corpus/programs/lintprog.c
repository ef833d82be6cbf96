extern int __VERIFIER_nondet_int(void);
int g;

void bump(int k) {
    g = g + k;
}

int twice(int x) {
    int y = x + x;
    while (y > 100) {
        y = y - 1;
    }
    return y;
}

int main() {
    int local = __VERIFIER_nondet_int();
    bump(local);
    int t = twice(local);
    return t - t;
}
