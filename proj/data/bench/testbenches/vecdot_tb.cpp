#include <cstdio>

#define LEN 1024
int vecdot(const int a[LEN], const int b[LEN]);

int main() {
    static int a[LEN], b[LEN];
    long long ref = 0;
    for (int i = 0; i < LEN; i++) {
        a[i] = i % 23 - 11;
        b[i] = (i * 7) % 19 - 9;
        ref += a[i] * b[i];
    }
    const int got = vecdot(a, b);
    const bool ok = got == static_cast<int>(ref);
    std::printf("%s: got %d expected %lld\n", ok ? "PASS" : "FAIL", got, ref);
    return ok ? 0 : 1;
}
