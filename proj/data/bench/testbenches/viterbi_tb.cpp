#include <cstdio>

#define S 16
#define T 128
#define SYMBOLS 8
void viterbi(const int obs[T], const int trans[S][S], const int emit[S][SYMBOLS], int metric[S]);

int main() {
    int obs[T], trans[S][S], emit[S][SYMBOLS], metric[S];
    for (int t = 0; t < T; t++) obs[t] = (t * 5 + 3) % SYMBOLS;
    for (int p = 0; p < S; p++)
        for (int s = 0; s < S; s++) trans[p][s] = -((p * 3 + s * 7) % 11);
    for (int s = 0; s < S; s++)
        for (int o = 0; o < SYMBOLS; o++) emit[s][o] = -((s + o * 2) % 9);

    int pm[S], next[S];
    for (int s = 0; s < S; s++) pm[s] = emit[s][obs[0]];
    for (int t = 1; t < T; t++) {
        for (int s = 0; s < S; s++) {
            int best = trans[0][s] + pm[0];
            for (int p = 1; p < S; p++)
                if (pm[p] + trans[p][s] > best) best = pm[p] + trans[p][s];
            next[s] = best + emit[s][obs[t]];
        }
        for (int s = 0; s < S; s++) pm[s] = next[s];
    }
    viterbi(obs, trans, emit, metric);
    int errors = 0;
    for (int s = 0; s < S; s++)
        if (metric[s] != pm[s]) errors++;
    std::printf("%s: %d mismatching states\n", errors ? "FAIL" : "PASS", errors);
    return errors ? 1 : 0;
}
