#include <cstdio>

#define LEN 64
void nw(const char a[LEN], const char b[LEN], int score[LEN + 1][LEN + 1]);

int main() {
    const char alphabet[] = "ACGT";
    char a[LEN], b[LEN];
    for (int i = 0; i < LEN; i++) {
        a[i] = alphabet[(i * 7 + 1) % 4];
        b[i] = alphabet[(i * 5 + 2) % 4];
    }
    static int score[LEN + 1][LEN + 1], ref[LEN + 1][LEN + 1];
    for (int j = 0; j <= LEN; j++) ref[0][j] = -j;
    for (int i = 0; i <= LEN; i++) ref[i][0] = -i;
    for (int i = 1; i <= LEN; i++)
        for (int j = 1; j <= LEN; j++) {
            int best = ref[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 1 : -1);
            if (ref[i - 1][j] - 1 > best) best = ref[i - 1][j] - 1;
            if (ref[i][j - 1] - 1 > best) best = ref[i][j - 1] - 1;
            ref[i][j] = best;
        }
    nw(a, b, score);
    const bool ok = score[LEN][LEN] == ref[LEN][LEN];
    std::printf("%s: final score %d expected %d\n", ok ? "PASS" : "FAIL", score[LEN][LEN], ref[LEN][LEN]);
    return ok ? 0 : 1;
}
