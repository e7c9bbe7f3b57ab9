#include <stdio.h>

/* Prints the smallest entry of a non-empty array. */
int main() {
    int a[100];
    int n;
    int i;
    int m;
    scanf("%d", &n);
    for (i = 0; i < n; i = i + 1) {
        scanf("%d", &a[i]);
    }
    m = a[0];
    for (i = 1; i < n; i = i + 1) {
        if (a[i] < m) {
            m = a[i];
        }
    }
    printf("min %d\n", m);
    return 0;
}
