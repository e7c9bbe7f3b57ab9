#include <stdio.h>

/* Stores a reversed into b. */
int main() {
    int a[100];
    int b[100];
    int n;
    int i;
    scanf("%d", &n);
    for (i = 0; i < n; i = i + 1) {
        scanf("%d", &a[i]);
    }
    i = 0;
    while (i < n) {
        b[i] = a[i - (n - 1)];
        i = i + 1;
    }
    for (i = 0; i < n; i = i + 1) {
        printf("%d\n", b[i]);
    }
    return 0;
}
