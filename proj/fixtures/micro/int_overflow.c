/* Micro-program: signed integer overflow, UBSan territory. */
volatile int big = 2147483647;

int main(void) {
  volatile int r = big + 1;
  return (int)(r & 1);
}
