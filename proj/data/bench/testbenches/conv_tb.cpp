#include <cstdio>

#define H 64
#define W 64
#define K 3
void conv2d(const int in[H + K - 1][W + K - 1], const int coeff[K][K], int out[H][W]);

int main() {
    static int in[H + K - 1][W + K - 1], out[H][W];
    int coeff[K][K] = {{1, 2, 1}, {2, 4, 2}, {1, 2, 1}};
    for (int y = 0; y < H + K - 1; y++)
        for (int x = 0; x < W + K - 1; x++) in[y][x] = (y * 7 + x * 3) % 31;
    conv2d(in, coeff, out);
    int errors = 0;
    for (int y = 0; y < H; y++)
        for (int x = 0; x < W; x++) {
            int ref = 0;
            for (int i = 0; i < K; i++)
                for (int j = 0; j < K; j++) ref += in[y + i][x + j] * coeff[i][j];
            if (ref != out[y][x]) errors++;
        }
    std::printf("%s: %d errors\n", errors ? "FAIL" : "PASS", errors);
    return errors ? 1 : 0;
}
