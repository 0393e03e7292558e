#define LEN 64

void bitonic(int data[LEN]) {
stage:
    for (int k = 2; k <= LEN; k <<= 1) {
    step:
        for (int j = k >> 1; j > 0; j >>= 1) {
        cmp:
            for (int i = 0; i < LEN; i++) {
                int l = i ^ j;
                if (l > i) {
                    int a = data[i];
                    int b = data[l];
                    bool up = (i & k) == 0;
                    if ((a > b) == up) {
                        data[i] = b;
                        data[l] = a;
                    }
                }
            }
        }
    }
}
