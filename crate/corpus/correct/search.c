#include <stdio.h>

/* Finds the position of key in the array, or -1. */
int main() {
    int a[100];
    int n;
    int key;
    int i;
    int pos;
    scanf("%d %d", &n, &key);
    for (i = 0; i < n; i = i + 1) {
        scanf("%d", &a[i]);
    }
    pos = -1;
    i = 0;
    while (i < n) {
        if (a[i] == key) {
            pos = i;
        }
        i = i + 1;
    }
    printf("%d\n", pos);
    return 0;
}
