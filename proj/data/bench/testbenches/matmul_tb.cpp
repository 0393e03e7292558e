#include <cstdio>

#define N 64
void matmul(const int A[N][N], const int B[N][N], int C[N][N]);

int main() {
    static int A[N][N], B[N][N], C[N][N];
    for (int i = 0; i < N; i++)
        for (int j = 0; j < N; j++) {
            A[i][j] = (i * 3 + j) % 17 - 8;
            B[i][j] = (i + j * 5) % 13 - 6;
        }
    matmul(A, B, C);
    int errors = 0;
    for (int i = 0; i < N; i++)
        for (int j = 0; j < N; j++) {
            int ref = 0;
            for (int k = 0; k < N; k++) ref += A[i][k] * B[k][j];
            if (ref != C[i][j]) errors++;
        }
    std::printf("%s: %d errors\n", errors ? "FAIL" : "PASS", errors);
    return errors ? 1 : 0;
}
