#include <stdio.h>

/* Product of n numbers. */
int main() {
    int a[100];
    int n;
    int i;
    int p;
    scanf("%d", &n);
    for (i = 0; i < n; i = i + 1) {
        scanf("%d", &a[i]);
    }
    p = 0;
    i = 0;
    while (i < n) {
        p = p * a[i];
        i = i + 1;
    }
    printf("%d\n", p);
    return 0;
}
