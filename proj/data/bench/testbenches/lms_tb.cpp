#include <cstdio>

#define TAPS 32
#define SAMPLES 256
void lms(const int x[SAMPLES], const int d[SAMPLES], int w[TAPS], int y[SAMPLES]);

int main() {
    int x[SAMPLES], d[SAMPLES], y[SAMPLES], w[TAPS] = {0}, w_ref[TAPS] = {0}, y_ref[SAMPLES];
    for (int n = 0; n < SAMPLES; n++) {
        x[n] = ((n * 37) % 64) - 32;
        d[n] = (n > 0 ? x[n - 1] : 0) * 3;
    }
    int hist[TAPS] = {0};
    for (int n = 0; n < SAMPLES; n++) {
        for (int k = TAPS - 1; k > 0; k--) hist[k] = hist[k - 1];
        hist[0] = x[n];
        int acc = 0;
        for (int k = 0; k < TAPS; k++) acc += w_ref[k] * hist[k];
        y_ref[n] = acc;
        const int err = (d[n] - acc) >> 4;
        for (int k = 0; k < TAPS; k++) w_ref[k] += (err * hist[k]) >> 8;
    }
    lms(x, d, w, y);
    int errors = 0;
    for (int n = 0; n < SAMPLES; n++)
        if (y[n] != y_ref[n]) errors++;
    for (int k = 0; k < TAPS; k++)
        if (w[k] != w_ref[k]) errors++;
    std::printf("%s: %d mismatches\n", errors ? "FAIL" : "PASS", errors);
    return errors ? 1 : 0;
}
