#define N 128

void matvec(const int M[N][N], const int v[N], int out[N]) {
row:
    for (int i = 0; i < N; i++) {
        int acc = 0;
    dot:
        for (int j = 0; j < N; j++) {
            acc += M[i][j] * v[j];
        }
        out[i] = acc;
    }
}
