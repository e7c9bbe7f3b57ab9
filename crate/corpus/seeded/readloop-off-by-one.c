#include <stdio.h>

/* Reads exactly n values and echoes each one doubled. */
int main() {
    int n;
    int i;
    int x;
    scanf("%d", &n);
    i = 0;
    while (i <= n) {
        scanf("%d", &x);
        printf("%d\n", x * 2);
        i = i + 1;
    }
    return 0;
}
