#include <cstdio>

#define LEN 64
void bitonic(int data[LEN]);

int main() {
    int data[LEN];
    unsigned s = 12345;
    for (int i = 0; i < LEN; i++) {
        s = s * 1103515245u + 12345u;
        data[i] = static_cast<int>((s >> 16) % 1000);
    }
    bitonic(data);
    int errors = 0;
    for (int i = 1; i < LEN; i++)
        if (data[i - 1] > data[i]) errors++;
    std::printf("%s: %d out of order\n", errors ? "FAIL" : "PASS", errors);
    return errors ? 1 : 0;
}
