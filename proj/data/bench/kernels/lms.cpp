#define TAPS 32
#define SAMPLES 256

void lms(const int x[SAMPLES], const int d[SAMPLES], int w[TAPS], int y[SAMPLES]) {
    int hist[TAPS];
clear:
    for (int k = 0; k < TAPS; k++) {
        hist[k] = 0;
    }
sample:
    for (int n = 0; n < SAMPLES; n++) {
    shift:
        for (int k = TAPS - 1; k > 0; k--) {
            hist[k] = hist[k - 1];
        }
        hist[0] = x[n];
        int acc = 0;
    fir:
        for (int k = 0; k < TAPS; k++) {
            acc += w[k] * hist[k];
        }
        y[n] = acc;
        int err = (d[n] - acc) >> 4;
    update:
        for (int k = 0; k < TAPS; k++) {
            w[k] += (err * hist[k]) >> 8;
        }
    }
}
