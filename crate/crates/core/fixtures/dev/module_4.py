import math
import itertools
import shutil
import re
from collections import Counter

' '.join(config)
os.path.join(my_list, words)
sorted(path, key=lambda x: (x[0], x[1]))
sorted(row, key=lambda x: x[2])
os.listdir(my_list)
sys.exit(0)
datetime.datetime.strptime(result, '%Y-%m-%d')
buf.groupby('city').sum()
df.groupby('date').sum()
np.mean(records)
os.listdir(text)
os.remove('out.txt')
