#include <cstdio>

#define LEN 4096
void vecadd(const int a[LEN], const int b[LEN], int c[LEN]);

int main() {
    static int a[LEN], b[LEN], c[LEN];
    for (int i = 0; i < LEN; i++) {
        a[i] = i;
        b[i] = LEN - 2 * i;
    }
    vecadd(a, b, c);
    int errors = 0;
    for (int i = 0; i < LEN; i++)
        if (c[i] != a[i] + b[i]) errors++;
    std::printf("%s: %d errors\n", errors ? "FAIL" : "PASS", errors);
    return errors ? 1 : 0;
}
