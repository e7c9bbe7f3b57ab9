#include <stdio.h>

/* Reads n numbers and prints their sum. */
int main() {
    int a[100];
    int n;
    int i;
    int s;
    scanf("%d", &n);
    i = 0;
    while (i < n) {
        scanf("%d", &a[i]);
        i = i + 1;
    }
    s = 1;
    i = 0;
    while (i < n) {
        s = s + a[i];
        i = i + 1;
    }
    printf("%d\n", s);
    return 0;
}
