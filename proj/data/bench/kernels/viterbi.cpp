#define S 16
#define T 128
#define SYMBOLS 8
#define NEG_INF (-1000000)

void viterbi(const int obs[T], const int trans[S][S], const int emit[S][SYMBOLS], int metric[S]) {
    int pm[S];
    int next[S];
init:
    for (int s = 0; s < S; s++) {
        pm[s] = emit[s][obs[0]];
    }
time:
    for (int t = 1; t < T; t++) {
    dst:
        for (int s = 0; s < S; s++) {
            int best = NEG_INF;
        src:
            for (int p = 0; p < S; p++) {
                int m = pm[p] + trans[p][s];
                if (m > best) best = m;
            }
            next[s] = best + emit[s][obs[t]];
        }
    copy:
        for (int s = 0; s < S; s++) {
            pm[s] = next[s];
        }
    }
out:
    for (int s = 0; s < S; s++) {
        metric[s] = pm[s];
    }
}
