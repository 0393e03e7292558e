#define H 64
#define W 64
#define K 3

void conv2d(const int in[H + K - 1][W + K - 1], const int coeff[K][K], int out[H][W]) {
rows:
    for (int y = 0; y < H; y++) {
    cols:
        for (int x = 0; x < W; x++) {
            int acc = 0;
        ky:
            for (int i = 0; i < K; i++) {
            kx:
                for (int j = 0; j < K; j++) {
                    acc += in[y + i][x + j] * coeff[i][j];
                }
            }
            out[y][x] = acc;
        }
    }
}
