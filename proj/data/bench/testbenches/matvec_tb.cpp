#include <cstdio>

#define N 128
void matvec(const int M[N][N], const int v[N], int out[N]);

int main() {
    static int M[N][N];
    int v[N], out[N];
    for (int i = 0; i < N; i++) {
        v[i] = i % 9 - 4;
        for (int j = 0; j < N; j++) M[i][j] = (i * 11 + j * 3) % 29 - 14;
    }
    matvec(M, v, out);
    int errors = 0;
    for (int i = 0; i < N; i++) {
        int ref = 0;
        for (int j = 0; j < N; j++) ref += M[i][j] * v[j];
        if (ref != out[i]) errors++;
    }
    std::printf("%s: %d errors\n", errors ? "FAIL" : "PASS", errors);
    return errors ? 1 : 0;
}
