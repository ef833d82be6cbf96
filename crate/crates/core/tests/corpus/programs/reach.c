extern int __VERIFIER_nondet_int(void);

int main() {
    int x = __VERIFIER_nondet_int();
    int y = __VERIFIER_nondet_int();
    if (x + y == 13) reach_error();
    if (x < -6) abort();
    return x & 1;
}
