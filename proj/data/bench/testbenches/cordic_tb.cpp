#include <cmath>
#include <cstdio>
#include <cstdlib>

#define SAMPLES 128
void cordic(const int angle[SAMPLES], int cos_out[SAMPLES], int sin_out[SAMPLES]);

int main() {
    int angle[SAMPLES], c[SAMPLES], s[SAMPLES];
    for (int n = 0; n < SAMPLES; n++) angle[n] = (n - SAMPLES / 2) * 1600;  // Q16 radians in about [-1.56, 1.54]
    cordic(angle, c, s);
    int errors = 0;
    for (int n = 0; n < SAMPLES; n++) {
        const double a = angle[n] / 65536.0;
        const int rc = static_cast<int>(std::lround(std::cos(a) * 65536.0));
        const int rs = static_cast<int>(std::lround(std::sin(a) * 65536.0));
        if (std::abs(c[n] - rc) > 64 || std::abs(s[n] - rs) > 64) errors++;
    }
    std::printf("%s: %d samples outside tolerance\n", errors ? "FAIL" : "PASS", errors);
    return errors ? 1 : 0;
}
