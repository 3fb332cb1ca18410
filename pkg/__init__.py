# Composit Regression Project
