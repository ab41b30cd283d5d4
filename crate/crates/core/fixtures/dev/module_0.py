import math
import numpy
import shutil
import pandas
import itertools

' '.join(words)
sorted(records.items(), key=lambda kv: kv[1])
datetime.datetime.strptime(lines, '%Y-%m-%d')
list(itertools.permutations(data))
frame.strip()
sorted(result, key=lambda x: x[4])
row['age']
records.get('name', None)
with open('data.csv') as fh:
    records = json.load(fh)
np.fromfunction(items, shape=(arr, 2))
os.path.exists('input.txt')
shutil.copyfile(frame, matrix)
