#define SAMPLES 128
#define ITERS 16
#define CORDIC_K 39797  // 0.607253 in Q16

void cordic(const int angle[SAMPLES], int cos_out[SAMPLES], int sin_out[SAMPLES]) {
    static const int atan_tab[ITERS] = {51472, 30386, 16055, 8150, 4091, 2047, 1024, 512,
                                        256,   128,   64,    32,   16,   8,    4,    2};
sample:
    for (int n = 0; n < SAMPLES; n++) {
        int x = CORDIC_K;
        int y = 0;
        int z = angle[n];
    rot:
        for (int i = 0; i < ITERS; i++) {
            int dx = y >> i;
            int dy = x >> i;
            if (z >= 0) {
                x -= dx;
                y += dy;
                z -= atan_tab[i];
            } else {
                x += dx;
                y -= dy;
                z += atan_tab[i];
            }
        }
        cos_out[n] = x;
        sin_out[n] = y;
    }
}
