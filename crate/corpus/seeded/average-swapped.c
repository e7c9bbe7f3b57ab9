#include <stdio.h>

/* Integer average of n numbers. */
int main() {
    int a[100];
    int n;
    int i;
    int s;
    int avg;
    scanf("%d", &n);
    for (i = 0; i < n; i = i + 1) {
        scanf("%d", &a[i]);
    }
    s = 0;
    for (i = 0; i < n; i = i + 1) {
        s = s + a[i];
    }
    avg = n / s;
    printf("%d\n", avg);
    return 0;
}
