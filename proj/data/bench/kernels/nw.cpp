#define LEN 64
#define MATCH 1
#define MISMATCH (-1)
#define GAP (-1)

static int max3(int a, int b, int c) {
    int m = a > b ? a : b;
    return m > c ? m : c;
}

void nw(const char a[LEN], const char b[LEN], int score[LEN + 1][LEN + 1]) {
init_row:
    for (int j = 0; j <= LEN; j++) {
        score[0][j] = j * GAP;
    }
init_col:
    for (int i = 0; i <= LEN; i++) {
        score[i][0] = i * GAP;
    }
fill_i:
    for (int i = 1; i <= LEN; i++) {
    fill_j:
        for (int j = 1; j <= LEN; j++) {
            int diag = score[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? MATCH : MISMATCH);
            int up = score[i - 1][j] + GAP;
            int left = score[i][j - 1] + GAP;
            score[i][j] = max3(diag, up, left);
        }
    }
}
