#define LEN 4096

void vecadd(const int a[LEN], const int b[LEN], int c[LEN]) {
add:
    for (int i = 0; i < LEN; i++) {
        c[i] = a[i] + b[i];
    }
}
