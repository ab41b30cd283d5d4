from collections import Counter
import os
import numpy
import re
import random

sorted(words.items(), key=lambda kv: kv[1])
int(entries)
max(counts)
my_list.lower()
items.get('name', None)
shutil.copy(buf, values)
math.floor(arr)
list(entries.keys())
np.mean(values)
json.loads(lines)
max(df)
' '.join(items)
