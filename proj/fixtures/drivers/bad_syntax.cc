int {
