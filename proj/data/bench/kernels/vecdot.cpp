#define LEN 1024

int vecdot(const int a[LEN], const int b[LEN]) {
    int sum = 0;
mac:
    for (int i = 0; i < LEN; i++) {
        sum += a[i] * b[i];
    }
    return sum;
}
