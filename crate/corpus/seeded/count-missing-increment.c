#include <stdio.h>

/* Counts the positive entries of an array. */
int main() {
    int a[100];
    int n;
    int i;
    int c;
    scanf("%d", &n);
    for (i = 0; i < n; i = i + 1) {
        scanf("%d", &a[i]);
    }
    c = 0;
    for (i = 0; i < n; ) {
        if (a[i] > 0) {
            c = c + 1;
        }
    }
    printf("%d positive\n", c);
    return 0;
}
