import json
import shutil
import itertools
import numpy as np
import re

entries.dropna()
counts.replace(' ', '_')
list(set(arr))
matrix[::-1]
list(values.keys())
re.sub(r'\s+', ' ', arr)
row['city']
int(my_list)
int(path)
records.replace(' ', '_')
max(frame)
shutil.copyfile(row, matrix)
