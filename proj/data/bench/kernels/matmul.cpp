#define N 64

void matmul(const int A[N][N], const int B[N][N], int C[N][N]) {
row:
    for (int i = 0; i < N; i++) {
    col:
        for (int j = 0; j < N; j++) {
            int sum = 0;
        prod:
            for (int k = 0; k < N; k++) {
                sum += A[i][k] * B[k][j];
            }
            C[i][j] = sum;
        }
    }
}
