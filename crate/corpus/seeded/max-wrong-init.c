#include <stdio.h>

/* Prints the largest entry of a non-empty array. */
int main() {
    int a[100];
    int n;
    int i;
    int m;
    scanf("%d", &n);
    for (i = 0; i < n; i = i + 1) {
        scanf("%d", &a[i]);
    }
    m = a[1];
    i = 1;
    while (i < n) {
        if (a[i] > m) {
            m = a[i];
        }
        i = i + 1;
    }
    printf("max %d\n", m);
    return 0;
}
