# coding: utf-8
"""
@author: sdy
@email: sdy@epri.sgcc.com.cn
"""

from multiprocessing import Pool, cpu_count


def run_multi_process(func, items, n_process=None, **kwargs):
    """
    Split items into chunks and call func(chunk, **kwargs) in a process pool.

    :param func: picklable function taking a list.
    :param items: list.
    :param n_process: int. Defaults to the cpu count.
    :return: list of the chunk results, in chunk order.
    """
    if not items:
        return []
    n_process = min(n_process or cpu_count(), len(items))
    step = max(round(len(items) / n_process), 1)
    pool = Pool(n_process)
    jobs = [pool.apply_async(func, args=(items[i: i + step],), kwds=kwargs)
            for i in range(0, len(items), step)]
    pool.close()
    pool.join()
    return [j.get() for j in jobs]
